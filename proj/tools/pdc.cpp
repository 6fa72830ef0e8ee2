#include "pdc/cli.hpp"

int main(int argc, char** argv) {
  return pdc::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
