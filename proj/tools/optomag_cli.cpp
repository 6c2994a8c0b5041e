#include "optomag/cli.hpp"

int main(int argc, char** argv) { return optomag::cli::run(argc, argv); }
