#include "girf/cli.hpp"

int main(int argc, char** argv) { return girf::cli::main(argc, argv); }
