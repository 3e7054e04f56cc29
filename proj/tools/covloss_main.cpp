#include "covloss/cli.hpp"

int main(int argc, char** argv) { return covloss::run_cli(argc, argv); }
