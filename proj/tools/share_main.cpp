#include <iostream>
#include <string>
#include <vector>

#include "share/cli/commands.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return share::dispatch(args, std::cout, std::cerr);
}
