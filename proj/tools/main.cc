#include <iostream>
#include <string>
#include <vector>

#include "zfo/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return zfo::Dispatch(args, std::cout, std::cerr);
}
