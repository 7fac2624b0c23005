// Throughput of Engine::advance_to: events per second at a given (d, n).
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "rdness/simulate.hpp"

int main(int argc, char** argv) {
    rdness::ModelParams p{1.0, 1.0, 0.2, argc > 1 ? std::atoi(argv[1]) : 1, argc > 2 ? std::atoi(argv[2]) : 256};
    const double t = argc > 3 ? std::atof(argv[3]) : 10.0;
    auto rng = rdness::CounterRng::for_replica(1, 0);
    rdness::Torus torus(p.d, p.n);
    rdness::Engine e(p, rdness::bernoulli_config(torus, 0.5, rng), rng);
    const auto start = std::chrono::steady_clock::now();
    e.advance_to(t);
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double ev = static_cast<double>(e.exchange_events + e.flip_proposals);
    std::printf("d=%d n=%d T=%g events=%.3e wall=%.3fs ns/event=%.3f density=%.4f\n", p.d, p.n, t, ev, s, 1e9 * s / ev,
                e.config().density());
}
