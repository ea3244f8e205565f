#include "eagc/cli.hpp"

int main(int argc, char** argv) { return eagc::cli::run(argc, argv); }
