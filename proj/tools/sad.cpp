#include "sad/cli.hpp"

#include <torch/torch.h>

int main(int argc, char** argv) {
    torch::set_num_threads(1);
    return sad::run_cli(argc, argv);
}
