#include "cli.hpp"

int main(int argc, char** argv) { return gscout::cli_main(argc, argv); }
