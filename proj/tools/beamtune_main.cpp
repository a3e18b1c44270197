#include <iostream>

#include "beamtune/cli.hpp"

int main(int argc, char** argv) {
  return beamtune::run_cli(argc, argv, std::cout, std::cerr);
}
