#include <iostream>

#include "smcchees/experiment.hpp"

int main(int argc, char** argv) {
  return smcchees::cli_main(argc, argv, std::cout, std::cerr);
}
