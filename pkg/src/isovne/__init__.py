"""Virtual network embedding with node isolation levels: generators, four embedding algorithms and a discrete-event simulator."""

__version__ = "0.1.0"
