#include <iostream>

#include "quasibohm_app/app.hpp"

int main(int argc, char** argv) { return quasibohm::app::main_entry(argc, argv, std::cout, std::cerr); }
