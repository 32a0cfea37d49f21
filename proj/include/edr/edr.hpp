#pragma once

// Umbrella header for the EDR/AD C-ITS simulator library.

#include "edr/access.hpp"
#include "edr/bytes.hpp"
#include "edr/can.hpp"
#include "edr/consent.hpp"
#include "edr/crypto.hpp"
#include "edr/enrich.hpp"
#include "edr/payloads.hpp"
#include "edr/pki.hpp"
#include "edr/reconstruct.hpp"
#include "edr/recorder.hpp"
#include "edr/result.hpp"
#include "edr/scenario.hpp"
#include "edr/sim.hpp"
#include "edr/types.hpp"
#include "edr/v2x.hpp"
