#include <vector>

#include "dagsample/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dagsample::run_cli(args);
}
