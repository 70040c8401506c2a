#include "scurv/cli.hpp"

int main(int argc, char** argv) { return scurv::cli_main(argc, argv); }
