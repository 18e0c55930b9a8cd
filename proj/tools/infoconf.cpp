#include <iostream>

#include "infoconf/cli.hpp"

int main(int argc, char** argv) {
  return infoconf::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
