#include <vector>

#include "cgw/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cgw::cli::run(std::move(args));
}
