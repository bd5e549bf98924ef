#include "cli.hpp"

int main(int argc, char** argv) { return tdsym::cli::run(argc, argv); }
