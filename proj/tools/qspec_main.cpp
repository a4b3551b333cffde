#include "qspec/cli.hpp"

int main(int argc, char** argv) { return qspec::cli::run(argc, argv); }
