#include <iostream>
#include <string>
#include <vector>

#include "scf_cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return scf::cli::dispatch(args, std::cout, std::cerr);
}
