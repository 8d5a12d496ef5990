from harness.registry import (
    AbstractScheme,
    Example,
    SchemeMetadata,
    get_global_scheme_registry,
)


def scheme(name: str, title: str | None = None):
    """
    Registers this class as the scheme called `name`.

    A class that is annotated with `@scheme` is added to the global scheme
    registry, which is where the `verify` subcommand looks schemes up. The
    class must inherit from `AbstractScheme`.
    """

    def wrapper(scheme_class: type[AbstractScheme]):
        if not issubclass(scheme_class, AbstractScheme):
            raise ValueError("@scheme class must inherit from AbstractScheme")

        get_global_scheme_registry().add_metadata(
            SchemeMetadata(klass=scheme_class, name=name, title=title)
        )

        return scheme_class

    return wrapper


def example(
    a: list[list[int]],
    b: list[list[int]],
    q: int,
    expected: list[list[int]] | int,
):
    """Add a hand-worked input pair and the output the receiver must recover for it."""

    def wrapper(scheme_class: type[AbstractScheme]):
        get_global_scheme_registry().add_example(
            scheme_class, Example(a=a, b=b, q=q, expected=expected)
        )

        return scheme_class

    return wrapper
