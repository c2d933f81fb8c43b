#include <iostream>

#include "fgaug/pipeline/commands.hpp"

int main(int argc, char** argv) {
  return fgaug::pipeline::run_cli(argc, argv, std::cout, std::cerr);
}
