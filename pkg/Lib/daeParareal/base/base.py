from copy import deepcopy
from daeParareal.base.errors import DaeParaError


# -------
# Helpers
# -------

class dynamicProperty(object):

    """
    A property whose getter and setter are resolved by
    name at access time. Models declare the public name
    once and implement ``_get_<name>`` (and optionally
    ``_set_<name>``); subclasses refine a single hook
    without redeclaring the property:

        class BaseModel(BaseObject):

            inertia = dynamicProperty("inertia")

            def _get_inertia(self):
                return self._inertia


        class ScaledModel(BaseModel):

            def _get_inertia(self):
                return 2 * self._inertia

    Properties without a ``_set_`` hook are read only;
    assigning to them raises :class:`DaeParaError`.
    """

    def __init__(self, name, doc=None):
        self.name = name
        self.__doc__ = doc
        self.getterName = "_get_%s" % name
        self.setterName = "_set_%s" % name

    def __get__(self, obj, cls):
        if obj is None:
            return self
        getter = getattr(obj, self.getterName, None)
        if getter is None:
            raise DaeParaError("%s has no getter for %r"
                               % (type(obj).__name__, self.name))
        return getter()

    def __set__(self, obj, value):
        setter = getattr(obj, self.setterName, None)
        if setter is None:
            raise DaeParaError("%r is read only" % self.name)
        setter(value)


# ------------
# Base Objects
# ------------

class BaseObject(object):

    # --------------
    # Initialization
    # --------------

    def __init__(self, *args, **kwargs):
        self._init(*args, **kwargs)

    def _init(self, *args, **kwargs):
        """
        Subclasses may override this method.
        """
        pass

    # ----
    # repr
    # ----

    def __repr__(self):
        parts = [self.__class__.__name__] + list(self._reprContents())
        return "<%s at %d>" % (" ".join(parts), id(self))

    def _reprContents(self):
        """
        Return a ``list`` of ``key=value`` strings shown
        by ``repr``. Overrides extend the list returned
        by ``super``.
        """
        return []

    # ----
    # Copy
    # ----

    copyClass = None
    copyAttributes = ()

    def copy(self):
        """
        Return an independent object of the same class.
        Every attribute named in ``copyAttributes`` is
        copied deeply.
        """
        cls = self.copyClass or self.__class__
        duplicate = cls.__new__(cls)
        duplicate.copyData(self)
        return duplicate

    def copyData(self, source):
        """
        Fill this object from **source**. Subclasses
        extending the copy call ``super`` first.
        """
        for name in self.copyAttributes:
            value = getattr(source, name)
            if isinstance(value, BaseObject):
                value = value.copy()
            else:
                value = deepcopy(value)
            setattr(self, name, value)

    # ----------
    # Exceptions
    # ----------

    def raiseNotImplementedError(self):
        """
        Raise for a hook the concrete system must provide.
        """
        raise NotImplementedError(
            "%s does not implement this method." % self.__class__.__name__
        )


class BaseDict(BaseObject):

    """
    A mapping with normalized keys and values. Subclasses
    assign ``keyNormalizer`` and ``valueNormalizer``;
    iteration follows sorted key order so output built
    from the mapping is reproducible.
    """

    keyNormalizer = None
    valueNormalizer = None

    copyAttributes = ("_data",)

    def _init(self, other=None):
        self._data = {}
        if other is not None:
            self.update(other)

    def _reprContents(self):
        return ["%s=%r" % item for item in self.items()]

    def _normalizeKey(self, key):
        normalizer = self.keyNormalizer
        if normalizer is None:
            return key
        return normalizer.__func__(key)

    def _normalizeValue(self, value):
        normalizer = self.valueNormalizer
        if normalizer is None:
            return value
        return normalizer.__func__(value)

    # mapping protocol

    def __len__(self):
        return len(self._data)

    def __iter__(self):
        return iter(self.keys())

    def __contains__(self, key):
        return self._normalizeKey(key) in self._data

    def __getitem__(self, key):
        return self._data[self._normalizeKey(key)]

    def __setitem__(self, key, value):
        self._data[self._normalizeKey(key)] = self._normalizeValue(value)

    def __delitem__(self, key):
        del self._data[self._normalizeKey(key)]

    def keys(self):
        return sorted(self._data)

    def values(self):
        return [self._data[key] for key in self.keys()]

    def items(self):
        return [(key, self._data[key]) for key in self.keys()]

    def get(self, key, default=None):
        return self._data.get(self._normalizeKey(key), default)

    def pop(self, key, default=None):
        return self._data.pop(self._normalizeKey(key), default)

    def update(self, other):
        for key, value in dict(other).items():
            self[key] = value

    def clear(self):
        self._data.clear()

    def asDict(self):
        return dict(self.items())
