#include <iostream>
#include <string>
#include <vector>

#include "hexflood/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hexflood::cli::run(args, std::cout, std::cerr);
}
