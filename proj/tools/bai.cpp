#include <iostream>
#include <string>
#include <vector>

#include "bai/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return bai::run_cli(args, std::cout, std::cerr);
}
