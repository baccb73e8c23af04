#include <iostream>
#include <string>
#include <vector>

#include "dcs/cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return dcs::cli::run(args, std::cout, std::cerr);
}
