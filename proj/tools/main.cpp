#include "commands.hpp"

int main(int argc, char** argv) {
  return topoflow::cli::run(std::vector<std::string>(argv, argv + argc));
}
