#include "mobgen/cli/app.hpp"

int main(int argc, char** argv) { return mobgen::cli::run(argc, argv); }
