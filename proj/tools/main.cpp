#include <string>
#include <vector>

#include "mpsflow/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mpsflow::cli::run(args);
}
