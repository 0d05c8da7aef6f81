#include <iostream>
#include <string>
#include <vector>

#include "v2i/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return v2i::cli::run(args, std::cout, std::cerr);
}
