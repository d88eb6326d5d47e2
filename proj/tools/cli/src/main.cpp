#include <iostream>

#include "etd_cli/commands.hpp"

int main(int argc, char** argv) {
  return etd::cli::run_cli(argc, argv, std::cout, std::cerr);
}
