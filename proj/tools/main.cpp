#include <iostream>

#include "lexzip/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return lexzip::cli::run(args, std::cout, std::cerr);
}
