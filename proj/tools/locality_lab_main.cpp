#include "loclab/experiment.hpp"

int main(int argc, char** argv) { return loclab::run_cli(argc, argv); }
