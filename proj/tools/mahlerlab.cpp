#include <iostream>

#include "mahlerlab/cli.hpp"

int main(int argc, char** argv) {
  return mahlerlab::cli::run(argc, argv, std::cout, std::cerr);
}
