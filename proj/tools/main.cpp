#include "boldplay/cli.hpp"

int main(int argc, char** argv) { return boldplay::run(argc, argv); }
