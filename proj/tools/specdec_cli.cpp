#include <iostream>
#include <string>
#include <vector>

#include "specdec/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return specdec::run_cli(args, std::cout, std::cerr);
}
