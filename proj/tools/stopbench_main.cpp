#include <string>
#include <vector>

#include "stopbench/cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return stopbench::cli::run(args);
}
