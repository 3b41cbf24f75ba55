#include <nsdim/report.hpp>

int main(int argc, char** argv) { return nsdim::report::cli_main(argc, argv); }
