#include "gdsa/cli.hpp"

int main(int argc, char** argv) { return gdsa::cli_main(argc, argv); }
