#include "viscompare/cli.hpp"

int main(int argc, char** argv) { return viscompare::cli::run(argc, argv); }
