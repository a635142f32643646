#include <cstdio>

int main() {
    std::puts("rattree: command-line interface under construction");
    return 0;
}
