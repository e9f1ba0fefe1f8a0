#include <iostream>
#include <string>
#include <vector>

#include "robust_sbl/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return robust_sbl::run_cli(args, std::cout, std::cerr);
}
