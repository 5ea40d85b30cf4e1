#include <iostream>
#include <string>
#include <vector>

#include "agestruct/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return agestruct::run_cli(args, std::cout, std::cerr);
}
