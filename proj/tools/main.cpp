#include <iostream>

#include "cli/cli.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  return afc::cli::run(argc, argv, std::cin, std::cout, std::cerr);
}
