#include "gptlab/cli.hpp"

int main(int argc, char** argv) { return gptlab::cli::run(argc, argv, std::cout, std::cerr); }
