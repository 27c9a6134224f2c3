#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "sglpath/io.hpp"
#include "sglpath/solver.hpp"
#include "test_support.hpp"

namespace sgl {
namespace {

namespace fs = std::filesystem;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sglpath_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  // "file:line: ..." from the thrown InputError
  std::string error_of(const std::function<void()>& f) {
    try {
      f();
    } catch (const io::InputError& e) {
      return e.what();
    }
    return "";
  }

  fs::path dir_;
};

TEST_F(IoTest, DenseCsv) {
  const auto p = write("x.csv", "a,b,c\n1,2,3\n4,5.5,-6e1\n");
  const auto x = io::read_dense_csv(p);
  ASSERT_EQ(x.rows(), 2);
  ASSERT_EQ(x.cols(), 3);
  EXPECT_EQ(x(1, 1), 5.5);
  EXPECT_EQ(x(1, 2), -60.0);
}

TEST_F(IoTest, DenseCsvErrorsNameTheLine) {
  const auto p = write("bad.csv", "a,b\n1,2\n3\n");
  EXPECT_NE(error_of([&] { io::read_dense_csv(p); }).find("bad.csv:3:"), std::string::npos);
  const auto q = write("nan.csv", "a,b\n1,2\n3,x\n");
  EXPECT_NE(error_of([&] { io::read_dense_csv(q); }).find("nan.csv:3:"), std::string::npos);
  const auto r = write("inf.csv", "a\n1\ninf\n");
  EXPECT_NE(error_of([&] { io::read_dense_csv(r); }).find("inf.csv:3:"), std::string::npos);
}

TEST_F(IoTest, MatrixMarket) {
  const auto p = write("x.mtx",
                       "%%MatrixMarket matrix coordinate real general\n% comment\n3 2 3\n1 1 2.5\n3 1 -1\n2 2 4\n");
  const auto x = DesignMatrix(io::read_matrix_market(p)).to_dense();
  EXPECT_EQ(x(0, 0), 2.5);
  EXPECT_EQ(x(2, 0), -1.0);
  EXPECT_EQ(x(1, 1), 4.0);
  EXPECT_EQ(x(0, 1), 0.0);
}

TEST_F(IoTest, MatrixMarketSymmetricAndPattern) {
  const auto p = write("s.mtx", "%%MatrixMarket matrix coordinate pattern symmetric\n2 2 2\n1 1\n2 1\n");
  const auto x = DesignMatrix(io::read_matrix_market(p)).to_dense();
  EXPECT_EQ(x(0, 0), 1.0);
  EXPECT_EQ(x(1, 0), 1.0);
  EXPECT_EQ(x(0, 1), 1.0);
  EXPECT_EQ(x(1, 1), 0.0);
}

TEST_F(IoTest, MatrixMarketErrors) {
  const auto a = write("a.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n");
  EXPECT_NE(error_of([&] { io::read_matrix_market(a); }).find("a.mtx:3:"), std::string::npos);
  const auto b = write("b.mtx", "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n");
  EXPECT_NE(error_of([&] { io::read_matrix_market(b); }).find("b.mtx:1:"), std::string::npos);
  const auto c = write("c.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n");
  EXPECT_FALSE(error_of([&] { io::read_matrix_market(c); }).empty());
}

TEST_F(IoTest, MatrixMarketRoundTrip) {
  std::mt19937_64 rng(1);
  const auto x = testing::random_sparse(30, 12, 0.2, rng);
  io::write_matrix_market(dir_ / "r.mtx", x);
  const auto back = io::read_matrix_market(dir_ / "r.mtx");
  const auto a = DesignMatrix(x).to_dense(), b = DesignMatrix(back).to_dense();
  for (Index i = 0; i < 30; ++i) {
    for (Index j = 0; j < 12; ++j) EXPECT_EQ(a(i, j), b(i, j));
  }
}

TEST_F(IoTest, DenseCsvRoundTripIsExact) {
  std::mt19937_64 rng(2);
  const auto x = testing::random_dense(7, 4, rng);
  io::write_dense_csv(dir_ / "x.csv", x);
  const auto back = io::read_dense_csv(dir_ / "x.csv");
  for (Index i = 0; i < 7; ++i) {
    for (Index j = 0; j < 4; ++j) EXPECT_EQ(x(i, j), back(i, j));
  }
}

TEST_F(IoTest, Vector) {
  EXPECT_EQ(io::read_vector(write("y.csv", "y\n1\n2.5\n")), (std::vector<double>{1.0, 2.5}));
  EXPECT_EQ(io::read_vector(write("z.csv", "1\n-3\n")), (std::vector<double>{1.0, -3.0}));
  EXPECT_NE(error_of([&] { io::read_vector(write("w.csv", "y\n1\nfoo\n")); }).find("w.csv:3:"),
            std::string::npos);
}

TEST_F(IoTest, Groups) {
  const auto g = io::read_groups("size:3", 9);
  EXPECT_EQ(g.n_groups(), 3);
  const auto h = io::read_groups(write("g.csv", "group\n1\n1\n2\n2\n2\n").string(), 5);
  EXPECT_EQ(h.n_groups(), 2);
  EXPECT_EQ(h.size(1), 3);
  EXPECT_THROW(io::read_groups(write("g2.csv", "1\n2\n1\n").string(), 3), io::InputError);
  EXPECT_THROW(io::read_groups(write("g3.csv", "1\n1\n").string(), 3), io::InputError);
  // a short last group absorbs the remainder
  const auto r = io::read_groups("size:4", 9);
  EXPECT_EQ(r.n_groups(), 3);
  EXPECT_EQ(r.size(2), 1);
  EXPECT_THROW(io::read_groups("size:0", 9), Error);
}

TEST_F(IoTest, Bounds) {
  const auto [lo, hi] = io::read_bounds(write("b.csv", "lower,upper\n-1,2\n-inf,inf\n0,0.5\n"));
  EXPECT_EQ(lo, (std::vector<double>{-1.0, -std::numeric_limits<double>::infinity(), 0.0}));
  EXPECT_EQ(hi, (std::vector<double>{2.0, std::numeric_limits<double>::infinity(), 0.5}));
  EXPECT_NE(error_of([&] { io::read_bounds(write("c.csv", "1,2\n")); }).find("c.csv:1:"), std::string::npos);
}

TEST_F(IoTest, FormatDoubleRoundTrips) {
  std::mt19937_64 rng(3);
  for (double v : testing::random_vector(50, rng, 1e3)) EXPECT_EQ(std::stod(io::format_double(v)), v);
  EXPECT_EQ(io::format_double(std::numeric_limits<double>::infinity()), "inf");
}

TEST_F(IoTest, DigestChangesWithContent) {
  const auto a = write("a.txt", "hello");
  const auto b = write("b.txt", "hellp");
  EXPECT_EQ(io::file_digest(a).size(), 16u);
  EXPECT_NE(io::file_digest(a), io::file_digest(b));
  // FNV-1a 64 of the empty string is the offset basis.
  EXPECT_EQ(io::file_digest(write("e.txt", "")), "cbf29ce484222325");
}

TEST_F(IoTest, PathRoundTripIsExact) {
  const auto sim = testing::simulate_alternating(60, 20, 4, 2.0, 4);
  FitConfig config;
  config.alpha = 0.3;
  config.nlambda = 15;
  const auto path = fit_path(DesignMatrix(sim.x), sim.y, sim.groups, config);
  io::write_path(dir_, path, nlohmann::json{{"tool", "test"}});
  const auto back = io::read_path(dir_);
  EXPECT_EQ(back.manifest["tool"], "test");
  EXPECT_EQ(back.path.lambdas, path.lambdas);
  EXPECT_EQ(back.path.intercepts, path.intercepts);
  EXPECT_EQ(back.path.lambda_max, path.lambda_max);
  EXPECT_EQ(back.path.alpha, path.alpha);
  EXPECT_EQ(back.path.group_weights, path.group_weights);
  EXPECT_EQ(back.path.groups.n_groups(), path.groups.n_groups());
  for (Index m = 0; m < path.size(); ++m) EXPECT_EQ(back.path.beta(m), path.beta(m));
}

}  // namespace
}  // namespace sgl
