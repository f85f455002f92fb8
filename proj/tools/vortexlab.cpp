#include "vortexlab/cli.hpp"

int main(int argc, char** argv) { return vortexlab::cli_dispatch(argc, argv); }
