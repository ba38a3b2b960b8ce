#include <iostream>
#include <string>
#include <vector>

#include "cprobe/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cprobe::cli::run(args, std::cout, std::cerr);
}
