var name = user?.profile?.name;
var cb = handlers?.onReady;
var result = cb?.(name);
