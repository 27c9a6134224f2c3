#include <string>
#include <vector>

#include "sglpath/cli.hpp"

int main(int argc, char** argv) {
  return sgl::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
