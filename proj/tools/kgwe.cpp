#include "kgwe/cli.hpp"

int main(int argc, char** argv) { return kgwe::cli::run(argc, argv); }
