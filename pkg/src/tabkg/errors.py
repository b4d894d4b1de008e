"""Exception hierarchy shared across the pipeline stages."""


class TabKGError(Exception):
    """Base class for every error raised by this package."""


# geometry
class GeometryError(TabKGError, ValueError):
    pass


class NonConvexClip(GeometryError):
    """The clip polygon handed to an intersection routine is not convex."""


class ZeroAreaLine(GeometryError):
    """A text line outline has zero area, so an overlap ratio is undefined."""


# PageXML
class PageXmlError(TabKGError):
    pass


class MalformedXml(PageXmlError):
    pass


class MissingCoords(PageXmlError):
    pass


class DuplicateId(PageXmlError):
    pass


class InvalidPage(PageXmlError):
    pass


# tables
class TableError(TabKGError, ValueError):
    pass


class NoTable(TableError):
    pass


class OverlappingCells(TableError):
    pass


class RowOutOfRange(TableError, IndexError):
    pass


# extraction
class ExtractionError(TabKGError):
    pass


class BackendFailure(ExtractionError):
    pass


class InvalidPattern(ExtractionError):
    pass


class SchemaError(ExtractionError):
    pass


# knowledge graph
class KGError(TabKGError):
    pass


class SchemaViolation(KGError):
    pass


class UnknownCell(KGError):
    pass


# shapes
class ShapesError(TabKGError):
    pass


class MalformedShapes(ShapesError):
    pass


class UnsupportedConstraint(ShapesError):
    def __init__(self, component, shape=None):
        self.component = component
        self.shape = shape
        where = f" in shape {shape}" if shape else ""
        super().__init__(f"unsupported SHACL constraint component {component}{where}")
