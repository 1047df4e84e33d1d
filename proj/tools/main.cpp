#include <iostream>
#include <string>
#include <vector>

#include "safe_el/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return safe_el::run_cli(args, std::cout, std::cerr);
}
