#include <iostream>

#include "ccfix/cli.hpp"

int main(int argc, char** argv) {
  return ccfix::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
