#include <iostream>

#include "tfm/cli.h"

int main(int argc, char** argv) {
  return tfm::run_cli(argc, argv, std::cout, std::cerr);
}
