#include <bayesclust/cli.hpp>

int main(int argc, char** argv) {
    return bayesclust::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
