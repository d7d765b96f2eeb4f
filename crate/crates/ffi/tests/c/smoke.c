#include <stdio.h>
#include "dhcosim.h"

int main(int argc, char **argv) {
    DhcScenario *sc = NULL;
    DhcStatus st = dhc_scenario_load(argc > 1 ? argv[1] : "missing.toml", &sc);
    if (st != DHC_STATUS_OK) {
        char msg[512];
        dhc_last_error_message(msg, sizeof msg);
        fprintf(stderr, "load failed (%d): %s\n", (int)st, msg);
        return 1;
    }
    DhcSimulator *sim = NULL;
    if (dhc_simulator_new(sc, "b", &sim) != DHC_STATUS_OK) return 2;
    size_t n_out = dhc_simulator_port_count(sim, 1);
    double in[3] = {353.15, 0.0, 343.15};
    double out[32];
    if (n_out > 32) return 3;
    dhc_simulator_initialize(sim, 0.0);
    for (int k = 0; k < 4; k++) {
        if (dhc_simulator_step(sim, 900.0 * k, 900.0, in, 3, out, n_out) != DHC_STATUS_OK) return 4;
    }
    printf("%zu %.3f\n", n_out, out[0]);
    dhc_simulator_free(sim);
    dhc_scenario_free(sc);
    return 0;
}
