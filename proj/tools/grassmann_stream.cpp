#include "gstream/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return gstream::cli::run_main(argc, argv, std::cout, std::cerr);
}
