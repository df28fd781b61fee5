#include "phaselab/scenario.hpp"

int main(int argc, char** argv) { return phaselab::cli_main(argc, argv); }
