#include <iostream>

#include "pin/cli.h"

int main(int argc, char **argv) {
  return pin::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cin, std::cout, std::cerr);
}
