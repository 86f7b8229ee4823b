#include <iostream>

#include "depthrefine/cli.hpp"

int main(int argc, char** argv) {
  return depthrefine::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
