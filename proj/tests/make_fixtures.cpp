#include <iostream>

#include "fixture_gen.hpp"

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixtures <dir>\n";
        return 1;
    }
    fafsp::test::write_fixtures(argv[1]);
    return 0;
}
