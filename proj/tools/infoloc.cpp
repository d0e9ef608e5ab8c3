#include <iostream>
#include <string>
#include <vector>

#include "infoloc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return infoloc::cli::run(args, std::cout, std::cerr);
}
