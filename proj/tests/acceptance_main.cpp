#include <iostream>
#include "crwrap/acceptance.hpp"
int main() { auto r = crwrap::run_acceptance("acceptance-out", std::cout); return r.all_pass() ? 0 : 1; }
