#include "euclid/cli/cli.h"

int main(int argc, char** argv) {
  return euclid::RunCli(std::vector<std::string>(argv + 1, argv + argc));
}
