#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "sdoa/log.hpp"

int main(int argc, char** argv)
{
    sdoa::set_warnings_enabled(false);
    doctest::Context ctx(argc, argv);
    return ctx.run();
}
