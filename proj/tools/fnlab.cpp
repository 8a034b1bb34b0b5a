#include <cstdio>
int main() { std::puts("fnlab: placeholder"); return 0; }
