#include <eigperturb/cli.hpp>

int main(int argc, char** argv) { return eigperturb::cli::run(argc, argv); }
