#pragma once

#define LCP_VERSION "0.1.0"
