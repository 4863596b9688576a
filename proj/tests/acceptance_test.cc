// placeholder; the full acceptance suite lands after the unit suites pass
#include <cstdio>
int main() { std::puts("acceptance suite not yet implemented"); return 1; }
