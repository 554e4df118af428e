// Command-line front end. Subcommands map onto the protocol drivers and
// solvers; results are emitted as CSV or JSON with a sidecar metadata file.
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "sqz/io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"spin-boson squeezing protocols"};
    app.require_subcommand(0, 1);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }
    std::cout << "no subcommand given; see --help\n";
    return 0;
}
