#include "spme/cli.hpp"

int main(int argc, char** argv) { return spme::run_cli(argc, argv); }
