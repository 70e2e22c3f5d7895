#include "pdecalib/cli.hpp"

int main(int argc, char** argv) { return pdecalib::run_cli(argc, argv); }
