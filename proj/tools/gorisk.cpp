#include <iostream>
#include <string>
#include <vector>

#include "gorisk/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return gorisk::cli::run(args, std::cout, std::cerr);
}
