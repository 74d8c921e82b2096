#include <iostream>
#include <string>
#include <vector>

#include "lrsched/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return lrsched::cli::run(args, std::cout, std::cerr);
}
