#include <iostream>

#include "tracealign/cli.hpp"

int main(int argc, char** argv) {
  return tracealign::cli::main_entry(argc, argv, std::cout, std::cerr);
}
