// Single point where httplib is configured and included so every
// translation unit sees the same feature macros.
#pragma once

#ifdef MTOSC_HTTPS_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif

#include <httplib.h>
