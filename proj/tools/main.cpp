#include <vector>

#include "wsdbias/cli.hpp"

int main(int argc, char** argv) {
  return wsdbias::run_command(std::vector<std::string>(argv + 1, argv + argc));
}
